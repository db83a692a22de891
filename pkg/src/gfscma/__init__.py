"""Success probability and error-rate analysis of grant-free SCMA in Poisson IoT networks."""

__version__ = "0.1.0"
