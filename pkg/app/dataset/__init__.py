"""Dataset ingest and the relational store keyed by class label."""
