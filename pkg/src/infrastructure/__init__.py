# Infrastructure package - Concrete implementations of interfaces
