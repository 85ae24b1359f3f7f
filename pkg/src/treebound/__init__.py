"""treebound: tree-like subspace extraction from finite metrics, task-system
simulation, and lower-bound adversaries with exact verification oracles."""

__version__ = "0.1.0"
