"""Lagrangian-Eulerian solver kit and bound-audit harness."""
