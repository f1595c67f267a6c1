"""
Active modules for termweb

Long-lived servers exporting operations at a network address, the stubs
that call them, and the strategies for publishing and locating addresses.
"""

# Wire format
from .wire import CallOutcome, Failure, GoalCall, ModuleAddress, RemoteError, Success

# Serving and calling
from .server import ActiveModule, ModuleStub, Registry, call_remote, import_stub, serve

# Address publishing and locating
from .discovery import (
    FileDiscovery,
    NameServerDiscovery,
    WebDiscovery,
    discovery_from_spec,
    locate_filebased,
    locate_nameserver,
    nameserver_registry,
    publish_filebased,
    publish_nameserver,
    run_nameserver,
)

__all__ = [
    # Wire
    'CallOutcome',
    'Failure',
    'GoalCall',
    'ModuleAddress',
    'RemoteError',
    'Success',

    # Server and client
    'ActiveModule',
    'ModuleStub',
    'Registry',
    'call_remote',
    'import_stub',
    'serve',

    # Discovery
    'FileDiscovery',
    'NameServerDiscovery',
    'WebDiscovery',
    'discovery_from_spec',
    'locate_filebased',
    'locate_nameserver',
    'nameserver_registry',
    'publish_filebased',
    'publish_nameserver',
    'run_nameserver',
]
