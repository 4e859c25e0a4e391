"""Test suite for the RSMA rate engine, solvers and SAC optimizer."""
