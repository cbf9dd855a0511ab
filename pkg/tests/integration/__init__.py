"""cavcool integration tests"""
