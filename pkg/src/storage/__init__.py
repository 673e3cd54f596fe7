"""Storage module for experiment configs and output files"""
