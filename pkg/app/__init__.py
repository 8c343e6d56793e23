# DP mechanism synthesizer package
