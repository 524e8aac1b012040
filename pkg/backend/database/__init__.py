"""Database package for the SOOT run registry."""
