#!/usr/bin/env python3
"""
cavcool cooling simulator

Usage:
    python -m cavcool COMMAND [OPTIONS]

Examples:
    # Rates on the optimum line at the cavity resonance, with limit formulas
    python -m cavcool rates --delta-c 0 --optimal-delta

    # Same point through the liouvillian engine
    python -m cavcool rates --delta-c 0 --optimal-delta --numerical

    # Steady-state phonon number along the optimum line
    python -m cavcool scan --axis1 delta_c:-2:1.5:351 --follow-optimum --output scan.csv

    # Two-dimensional map with a gnuplot matrix
    python -m cavcool scan --axis1 delta_c:-2:2:81 --axis2 delta:0:100:101 \\
        --no-follow-optimum --gnuplot map.dat

    # Excitation spectrum with the dressed resonances marked
    python -m cavcool spectrum --start -60 --stop 60 --points 1201

    # Monte Carlo ensemble for comparison panel (b)
    python -m cavcool mcwf --panel b --trajectories 500 --seed 7 --output panel_b.csv

    # Acceptance suite, reduced workload
    python -m cavcool validate --quick
"""

import sys

from cavcool.cli import main

if __name__ == "__main__":
    sys.exit(main())
