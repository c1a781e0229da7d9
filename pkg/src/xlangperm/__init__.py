"""Cross-language permission-mapping extraction and app auditing."""
__version__ = "0.1.0"
