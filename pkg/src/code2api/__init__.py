"""code2api: turn Stack Overflow code snippets into reusable APIs."""

__version__ = "0.1.0"
