"""Social group utility games for wireless networks."""

__version__ = "0.1.0"
