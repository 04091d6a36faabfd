"""Non-malleable codes against small-depth circuit tampering, at desk scale."""
