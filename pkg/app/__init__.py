"""
Visual RAG fine-grained classification of retail advertisements
"""
