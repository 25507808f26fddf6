# Config package
# Contains library defaults, environment variable names and tolerances
