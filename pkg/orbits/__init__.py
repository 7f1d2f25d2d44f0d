# Collision orbit construction
