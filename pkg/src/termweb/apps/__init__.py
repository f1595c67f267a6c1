"""
Programs built on termweb: the telephone database CGI program and the link checker.
"""

from .check_links import BadLink, check_links
from .phone_db_cgi import handle, lookup_response, phone_page, run_cgi

__all__ = [
    'BadLink',
    'check_links',
    'handle',
    'lookup_response',
    'phone_page',
    'run_cgi',
]
