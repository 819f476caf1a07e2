"""
.. module:: receptorchannel
    :platform: Darwin, Linux, Unix, Windows
    :synopsis: Ligand-receptor birth-death channels, their mutual information rates,
               capacities and a Monte Carlo oracle.

.. moduleauthor:: Myron Walker <myron.walker@gmail.com>
"""

__author__ = "Myron Walker"
__copyright__ = "Copyright 2023, Myron W Walker"
__credits__ = []
