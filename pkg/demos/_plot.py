"""Optional plotting shared by the demo scripts."""

import sys


def wants_plot():
    return "--plot" in sys.argv[1:]


def pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt
