"""
.. module:: __main__
    :platform: Darwin, Linux, Unix, Windows
    :synopsis: Runs the receptor capacity command line tool with `python -m`.

.. moduleauthor:: Myron Walker <myron.walker@gmail.com>
"""

__author__ = "Myron Walker"
__copyright__ = "Copyright 2023, Myron W Walker"
__credits__ = []


import sys

from mojo.receptorchannel.cli import main

if __name__ == "__main__":
    sys.exit(main())
