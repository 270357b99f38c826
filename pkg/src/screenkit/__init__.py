"""Tabular screening toolkit: survey cohorts, kNN imputation, from-scratch
learners, forward feature selection and evaluation reports."""

__version__ = "0.1.0"
