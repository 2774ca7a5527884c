"""Compiled numerical core.

Modules
-------
rk4
    Fixed-step classical Runge-Kutta for real affine systems ``y' = M y + b``.

Notes
-----
Sources are written in `pyx` format for use with :mod:`cython`; the pure
Python equivalents live in :mod:`kerrspt._fallback`.
"""
