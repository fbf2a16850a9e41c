"""Linear algebra, PCA, estimation and residual diagnostics."""
