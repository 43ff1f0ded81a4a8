from __future__ import annotations


class MsrError(Exception):
    """Base class for everything raised by this package."""


class FieldError(MsrError, ValueError):
    pass


class ThetaError(MsrError, ValueError):
    pass


class SingularSystemError(MsrError, ArithmeticError):
    # A q-column subsystem of Theta turned out singular: Theta is not MDS.
    pass


class RdpError(MsrError, ValueError):
    pass


class CouplerError(MsrError, ValueError):
    pass


class ParamError(MsrError, ValueError):
    pass


class DecodeError(MsrError):
    pass


class RepairError(MsrError, ValueError):
    pass


class ClusterError(MsrError):
    pass


class ShardFormatError(MsrError, ValueError):
    pass


class ManifestError(MsrError, ValueError):
    pass
