# Scripts package
# Contains the base runner and the sweep and verification workflows
