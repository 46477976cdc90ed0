"""junctionq tests."""
