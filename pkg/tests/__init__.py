# Tests package
# Contains unit tests and shared fixtures
