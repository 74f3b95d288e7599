"""kernelcat: Markov-kernel calculus for Bayesian inference.

Exact rational inference over finite spaces, closed-form Gaussian-process and
parametric updates, and HMM / Kalman filtering.
"""
__version__ = "0.1.0"
