"""dilu-sim - GPU resourcing-on-demand simulator for serverless deep learning."""

__version__ = "0.1.0"
