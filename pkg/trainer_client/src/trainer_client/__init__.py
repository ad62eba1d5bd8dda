from .session import (
    PROTOCOL_VERSION,
    ProtocolError,
    Session,
    StdioTransport,
    TcpTransport,
    Transport,
    connect,
    connect_stdio,
    connect_tcp,
    epoch_cycle,
)

__all__ = [
    "PROTOCOL_VERSION",
    "ProtocolError",
    "Session",
    "StdioTransport",
    "TcpTransport",
    "Transport",
    "connect",
    "connect_stdio",
    "connect_tcp",
    "epoch_cycle",
]
