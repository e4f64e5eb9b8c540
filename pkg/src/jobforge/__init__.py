"""jobforge: humans-in-the-loop corpus construction for job-related
social-media text.

A library plus a `forge` CLI covering rule-based filtering, linear SVM
training, confidence-guided sampling, multi-round annotation with consensus
aggregation, inter-annotator agreement statistics, account heuristics, a
JSON-lines store, and a simulated-annotator pipeline harness.
"""

__version__ = "0.1.0"
