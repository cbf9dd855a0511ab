"""cavcool unit tests"""
