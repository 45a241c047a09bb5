"""MeetCues: a real-time meeting back-channel platform.

Anonymized reactions and comments, a live emoji-cloud mood view, per-minute
engagement timelines, engagement-driven audio snippet extraction, and
post-meeting summary reports, served over HTTP with a push channel.
"""

__version__ = "0.1.0"
