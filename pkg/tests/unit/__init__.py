"""Empty __init__.py for unit tests package."""
