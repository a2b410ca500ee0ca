"""Generalized-inverse solvers for perturbed second-order operator boundary value problems."""
