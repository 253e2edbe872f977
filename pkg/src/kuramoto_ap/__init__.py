"""Adjacency polytope root counts for Kuramoto equilibria on trees and cycles."""

__version__ = "0.1.0"
