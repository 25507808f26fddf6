# Main package
# Contains the command-line entry point
