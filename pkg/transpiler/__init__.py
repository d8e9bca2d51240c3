"""QUBO-based qubit mapping and routing."""
