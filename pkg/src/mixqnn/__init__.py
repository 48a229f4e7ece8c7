"""Training variational quantum classifiers on per-class mixed ("global") states,
with membership-inference and composition-recovery audits and a
client/server protocol that only ever ships mixed states."""

__version__ = "0.1.0"
