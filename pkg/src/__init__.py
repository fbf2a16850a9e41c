# ratesvol: Treasury rate factors with VIX stochastic volatility
