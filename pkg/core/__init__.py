"""tmdyn core: machines, traces, head dynamics and recognizers."""
