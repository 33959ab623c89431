# Signal-level oracle and sweep execution
