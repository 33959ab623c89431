# System model types, fading ensembles, the MSE objective and experiment configuration
