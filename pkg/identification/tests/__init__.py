"""
Test package for the identification app.
""" 