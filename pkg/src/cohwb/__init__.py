"""A workbench for coherent theories, their Set models, and the finite
category constructions they induce: a bounded chase prover with replayable
certificates, syntactic categories with certified arrows, internal theories
of finite categories, explicit (2-)limit and colimit constructions, and a
stage-bounded small object argument at the level of theory presentations.
"""

__version__ = "0.1.0"
