"""
Connected Cruise Control Lab

Reactive and predictive cruise controllers for an automated vehicle driving
behind recorded or synthetic traffic, with the models, solvers and tooling to
simulate, compare and calibrate them.
"""

__version__ = "1.0.0"
