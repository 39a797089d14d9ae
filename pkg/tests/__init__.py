"""Test package for the gossip exchange simulator"""
