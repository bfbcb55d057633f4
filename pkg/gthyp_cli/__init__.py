"""Command-line front end for gthyp."""
