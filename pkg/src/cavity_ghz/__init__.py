"""Cavity GHZ: simulate n-cavity photonic GHZ states built through a single three-level coupler."""
