# Kernel calculus verification package
