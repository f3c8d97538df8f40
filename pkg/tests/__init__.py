"""Test package for wlanbalance."""
