"""cavcool test suite"""
