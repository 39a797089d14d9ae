"""
Exception hierarchy for the gossip simulator
"""


class GossipSimError(Exception):
    """Base class for every error raised by gossip_sim"""


class InvalidParams(GossipSimError, ValueError):
    """Generator or operation parameters are out of range"""


class InvalidConfig(GossipSimError, ValueError):
    """Configuration file or value failed validation"""


class GraphFormatError(GossipSimError, ValueError):
    """Edge-list file could not be parsed"""

    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class ZeroVolume(GossipSimError, ValueError):
    """A cut side has zero volume, so its conductance is undefined"""


class OverlappingSets(GossipSimError, ValueError):
    """Cut sides are required to be disjoint"""


class TooLargeForExact(GossipSimError):
    """Exact enumeration was requested above the configured size limit"""


class AsymmetricClosure(GossipSimError, ValueError):
    """An edge set expected to be symmetric is missing reverse edges"""


class IterationCapExceeded(GossipSimError):
    """Superstep did not empty its frontier within the iteration cap"""

    def __init__(self, message: str, report=None):
        self.report = report
        super().__init__(message)


class Disconnected(GossipSimError):
    """The operation needs a connected graph"""


class NonConvergence(GossipSimError):
    """DirectExchange grew its degree guess beyond n with active nodes left"""


class ScheduleGraphMismatch(GossipSimError, ValueError):
    """An exchange schedule does not belong to the given graph"""


class IncompleteRun(GossipSimError):
    """Spanner extraction needs a run that completed NeighborExchange"""


class NotSubgraph(GossipSimError, ValueError):
    """The candidate spanner uses an edge or node absent from the graph"""


class UncertifiedSpanner(GossipSimError):
    """The spanner does not have the claimed stretch"""


class RoundCapExceeded(GossipSimError):
    """A LOCAL execution did not halt within the round cap"""
