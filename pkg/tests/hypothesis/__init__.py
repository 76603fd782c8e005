"""Empty __init__.py for hypothesis tests package."""
