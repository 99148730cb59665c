# polarfloor test suite
