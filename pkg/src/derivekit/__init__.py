"""derivekit: procedural generation, perturbation, prompting, and scoring of
multi-step LaTeX equation derivations."""

__version__ = "0.1.0"
