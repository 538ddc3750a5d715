"""Rolling horizon evolutionary planners with statistical-tree population seeding."""

from rhea.agents import AgentVariant, make_agent
from rhea.core import Action, BudgetMeter, SeededRng, Status
from rhea.evolution import EvoParams
from rhea.tree import StatTree, UcbParams

__all__ = ["Action", "AgentVariant", "BudgetMeter", "EvoParams", "SeededRng", "StatTree", "Status", "UcbParams", "make_agent"]
