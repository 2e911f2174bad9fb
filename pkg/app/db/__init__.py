"""Enums and the PostgreSQL relational store."""
