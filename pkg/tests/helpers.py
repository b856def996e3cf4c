"""Small shared curve constructors for the tests."""

from fanning.curves import Exponential, Polynomial


def line_frame(window=(0.0, 1.0)):
    return Polynomial([[[1], [0]], [[0], [1]]], window)


def oscillator(sign=1.0, window=(-0.5, 0.5)):
    return Exponential([[0, -sign], [sign, 0]], [[1], [0]], window)
