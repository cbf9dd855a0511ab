"""
cavcool reports

Rendered summaries of validation runs.
"""
