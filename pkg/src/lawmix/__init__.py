"""lawmix: probabilistic mixture-of-laws world modeling for a survival gridworld.

Subsystems:

* ``state_core``   canonical state documents, leaf diffs, element counting
* ``env``          the gridworld itself (pure transition function + setup utils)
* ``law_lang``     the law DSL: parser, type checker, evaluator, pretty printer
* ``mixture``      product-of-experts next-state distribution over observables
* ``inference``    negative log-likelihood, analytic gradient, hand-rolled L-BFGS
* ``evaluation``   mutator-based ranking + reconstruction-fidelity harness
* ``planning``     BFS options, compiled plans, reward functions, plan comparison
* ``pipeline``     scripted exploration policy and dataset collection
* ``cli``          command-line entry point tying the stages together
"""

__version__ = "0.1.0"
