"""Addressing, gate compilation, error budgets and optimal control for dipolar-coupled NV centres."""

__version__ = "0.1.0"
