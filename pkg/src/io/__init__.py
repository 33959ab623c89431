# Config loading, CSV tables and run logging
