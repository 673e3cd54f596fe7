"""Numerical kernels: FFT plumbing, torus operators, extension algebra, integrability checks"""
