"""Workbench for tensegrity-crutch mechanics, crutch-gait kinetics, and
random-intercept mixed-effects modelling."""

__version__ = "0.1.0"
