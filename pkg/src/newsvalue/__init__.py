"""newsvalue: predict which locally reported disasters reach global news.

Feature extraction (topic, scope, impact, location, rarity) over short
reports, noisy labeling against wire headlines, and a linear SVM trained
on the result.
"""

__version__ = "0.1.0"
