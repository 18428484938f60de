"""Numerical simulator and experiment harness for a phase-trained optical
delay-line perceptron, with bit-error-rate evaluation and baseline models."""

__version__ = "0.1.0"
