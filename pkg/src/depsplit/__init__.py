"""Split bank deposits into retail and wholesale components from call-report summaries."""
__version__ = "0.1.0"
