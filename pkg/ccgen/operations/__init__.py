"""Domain operations: priors, scenarios, losses, evaluation and the toy model."""
