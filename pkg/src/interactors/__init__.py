# Interactors package - Decoding algorithms and simulation use cases
