"""Retrieval, classification, few-shot prompting and completion."""
