"""Sum network creation games: equilibria, structure and bound checks."""
