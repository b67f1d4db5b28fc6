"""Logical anomaly detection via generated check programs.

Pipeline: annotated images -> visual facts -> logical rules -> prompt ->
LLM-generated check program -> execution -> benchmark reports.
"""

__version__ = "0.1.0"
