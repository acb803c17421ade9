# Run reports and stored runs
