# Entities package - Domain types for polarfloor
